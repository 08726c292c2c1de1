//! Sparse item x user ratings, group-rating memberships, and the extended
//! matrix that appends scaled group columns to the user columns.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::clustering::MembershipMatrix;

#[derive(Debug, Error)]
pub enum RatingError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("rating {rating} for ({item}, {user}) is outside [{min}, {max}]")]
    OutOfScale {
        item: String,
        user: String,
        rating: f64,
        min: f64,
        max: f64,
    },
    #[error("duplicate rating for ({item}, {user})")]
    Duplicate { item: String, user: String },
    #[error("group matrix items do not match the rating matrix items")]
    ItemMismatch,
    #[error("scale factor must be finite and non-negative, got {0}")]
    BadScaleFactor(f64),
    #[error("invalid rating scale [{0}, {1}]")]
    BadScale(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl RatingScale {
    pub fn new(min: f64, max: f64) -> Result<Self, RatingError> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(RatingError::BadScale(min, max));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, r: f64) -> bool {
        (self.min..=self.max).contains(&r)
    }

    pub fn clamp(&self, r: f64) -> f64 {
        r.clamp(self.min, self.max)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

impl Default for RatingScale {
    fn default() -> Self {
        Self { min: 1.0, max: 5.0 }
    }
}

/// Interned string ids in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
struct Ids {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Ids {
    fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), self.names.len() - 1);
        self.names.len() - 1
    }

    fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// Sparse ratings with items as rows and users as columns. Unrated cells are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    scale: RatingScale,
    items: Ids,
    users: Ids,
    by_item: Vec<BTreeMap<usize, f64>>,
    by_user: Vec<BTreeMap<usize, f64>>,
}

impl RatingMatrix {
    pub fn new(scale: RatingScale) -> Self {
        Self {
            scale,
            items: Ids::default(),
            users: Ids::default(),
            by_item: Vec::new(),
            by_user: Vec::new(),
        }
    }

    /// Empty matrix whose item and user universes are declared up front.
    pub fn with_universe<'a>(
        scale: RatingScale,
        items: impl IntoIterator<Item = &'a str>,
        users: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let mut m = Self::new(scale);
        items.into_iter().for_each(|i| {
            m.add_item(i);
        });
        users.into_iter().for_each(|u| {
            m.add_user(u);
        });
        m
    }

    pub fn add_item(&mut self, id: &str) -> usize {
        let i = self.items.intern(id);
        if i == self.by_item.len() {
            self.by_item.push(BTreeMap::new());
        }
        i
    }

    pub fn add_user(&mut self, id: &str) -> usize {
        let u = self.users.intern(id);
        if u == self.by_user.len() {
            self.by_user.push(BTreeMap::new());
        }
        u
    }

    pub fn insert(&mut self, item: &str, user: &str, rating: f64) -> Result<(), RatingError> {
        if !self.scale.contains(rating) {
            return Err(RatingError::OutOfScale {
                item: item.to_owned(),
                user: user.to_owned(),
                rating,
                min: self.scale.min,
                max: self.scale.max,
            });
        }
        let i = self.add_item(item);
        let u = self.add_user(user);
        if self.by_item[i].contains_key(&u) {
            return Err(RatingError::Duplicate {
                item: item.to_owned(),
                user: user.to_owned(),
            });
        }
        self.by_item[i].insert(u, rating);
        self.by_user[u].insert(i, rating);
        Ok(())
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn n_items(&self) -> usize {
        self.items.names.len()
    }

    pub fn n_users(&self) -> usize {
        self.users.names.len()
    }

    /// Number of stored ratings.
    pub fn len(&self) -> usize {
        self.by_item.iter().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn item_ids(&self) -> &[String] {
        &self.items.names
    }

    pub fn user_ids(&self) -> &[String] {
        &self.users.names
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.items.get(id)
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.users.get(id)
    }

    pub fn get(&self, item: usize, user: usize) -> Option<f64> {
        self.by_item.get(item)?.get(&user).copied()
    }

    /// Ratings of one item keyed by user index.
    pub fn item_ratings(&self, item: usize) -> &BTreeMap<usize, f64> {
        &self.by_item[item]
    }

    /// Ratings by one user keyed by item index.
    pub fn user_ratings(&self, user: usize) -> &BTreeMap<usize, f64> {
        &self.by_user[user]
    }

    /// Mean rating of an item; `None` for an item nobody rated.
    pub fn item_mean(&self, item: usize) -> Option<f64> {
        let row = &self.by_item[item];
        (!row.is_empty()).then(|| row.values().sum::<f64>() / row.len() as f64)
    }

    /// All `(item_id, user_id, rating)` triples, item-major.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        self.by_item.iter().enumerate().flat_map(move |(i, row)| {
            row.iter()
                .map(move |(&u, &r)| (self.items.names[i].as_str(), self.users.names[u].as_str(), r))
        })
    }
}

#[derive(Deserialize)]
struct RatingRow {
    user_id: String,
    item_id: String,
    rating: f64,
}

pub fn load_ratings(path: impl AsRef<Path>, scale: RatingScale) -> Result<RatingMatrix, RatingError> {
    read_ratings(csv::Reader::from_path(path)?, scale)
}

/// Parses `user_id,item_id,rating` rows.
pub fn read_ratings<R: io::Read>(mut reader: csv::Reader<R>, scale: RatingScale) -> Result<RatingMatrix, RatingError> {
    let headers = reader.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["user_id", "item_id", "rating"] {
        return Err(RatingError::Parse {
            line: 1,
            reason: "expected header user_id,item_id,rating".into(),
        });
    }
    let mut matrix = RatingMatrix::new(scale);
    for row in reader.deserialize::<RatingRow>() {
        let row = row.map_err(|e| RatingError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        matrix.insert(row.item_id.trim(), row.user_id.trim(), row.rating)?;
    }
    Ok(matrix)
}

pub fn save_ratings(matrix: &RatingMatrix, path: impl AsRef<Path>) -> Result<(), RatingError> {
    let mut writer = csv::Writer::from_path(path)?;
    write_ratings(matrix, &mut writer)?;
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_ratings<W: io::Write>(matrix: &RatingMatrix, writer: &mut csv::Writer<W>) -> Result<(), RatingError> {
    writer.write_record(["user_id", "item_id", "rating"])?;
    for (item, user, rating) in matrix.entries() {
        writer.write_record([user, item, &rating.to_string()])?;
    }
    Ok(())
}

/// Dense items x clusters memberships used as pseudo-ratings in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupRatingMatrix {
    items: Vec<String>,
    values: Vec<Vec<f64>>,
    k: usize,
}

impl GroupRatingMatrix {
    pub fn new(items: Vec<String>, values: Vec<Vec<f64>>) -> Option<Self> {
        let k = values.first().map_or(0, Vec::len);
        let ok = items.len() == values.len()
            && values.iter().all(|r| r.len() == k && r.iter().all(|v| (0.0..=1.0).contains(v)));
        ok.then_some(Self { items, values, k })
    }

    /// A matrix with no group columns.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn item_ids(&self) -> &[String] {
        &self.items
    }

    pub fn row(&self, item: usize) -> &[f64] {
        &self.values[item]
    }

    pub fn value_for(&self, item_id: &str, group: usize) -> Option<f64> {
        let i = self.items.iter().position(|id| id == item_id)?;
        Some(self.values[i][group])
    }
}

/// Copies memberships into a group matrix keyed by `item_ids` (membership row order).
pub fn build_group_matrix(membership: &MembershipMatrix, item_ids: &[String]) -> Result<GroupRatingMatrix, RatingError> {
    if item_ids.len() != membership.items() {
        return Err(RatingError::ItemMismatch);
    }
    GroupRatingMatrix::new(item_ids.to_vec(), membership.rows().to_vec()).ok_or(RatingError::ItemMismatch)
}

pub fn load_groups(path: impl AsRef<Path>) -> Result<GroupRatingMatrix, RatingError> {
    read_groups(csv::Reader::from_path(path)?)
}

/// Parses `item_id,g0,...,g{k-1}`.
pub fn read_groups<R: io::Read>(mut reader: csv::Reader<R>) -> Result<GroupRatingMatrix, RatingError> {
    let headers = reader.headers()?.clone();
    if headers.is_empty() || &headers[0] != "item_id" {
        return Err(RatingError::Parse {
            line: 1,
            reason: "expected header item_id,g0,...".into(),
        });
    }
    let mut items = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .skip(1)
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| RatingError::Parse {
                line,
                reason: e.to_string(),
            })?;
        items.push(record[0].to_owned());
        values.push(row);
    }
    GroupRatingMatrix::new(items, values).ok_or(RatingError::Parse {
        line: 0,
        reason: "group values must lie in [0, 1]".into(),
    })
}

pub fn write_groups<W: io::Write>(groups: &GroupRatingMatrix, writer: &mut csv::Writer<W>) -> Result<(), RatingError> {
    let mut header = vec!["item_id".to_owned()];
    header.extend((0..groups.k).map(|g| format!("g{g}")));
    writer.write_record(&header)?;
    for (id, row) in groups.items.iter().zip(&groups.values) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(f64::to_string));
        writer.write_record(&rec)?;
    }
    Ok(())
}

pub fn save_groups(groups: &GroupRatingMatrix, path: impl AsRef<Path>) -> Result<(), RatingError> {
    let mut writer = csv::Writer::from_path(path)?;
    write_groups(groups, &mut writer)?;
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    User,
    Group,
}

/// User rating columns followed by group columns scaled by `scale_factor`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedMatrix {
    ratings: RatingMatrix,
    /// Scaled group values, aligned with the rating matrix item order.
    groups: Vec<Vec<f64>>,
    k: usize,
    scale_factor: f64,
}

impl ExtendedMatrix {
    pub fn ratings(&self) -> &RatingMatrix {
        &self.ratings
    }

    pub fn n_groups(&self) -> usize {
        self.k
    }

    pub fn n_columns(&self) -> usize {
        self.ratings.n_users() + self.k
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    pub fn column_kinds(&self) -> Vec<ColumnKind> {
        let mut kinds = vec![ColumnKind::User; self.ratings.n_users()];
        kinds.resize(self.n_columns(), ColumnKind::Group);
        kinds
    }

    /// Scaled group values of one item (empty when there are no groups).
    pub fn group_row(&self, item: usize) -> &[f64] {
        self.groups.get(item).map_or(&[], Vec::as_slice)
    }

    /// Unscaled membership, recovered by dividing out the scale factor.
    pub fn unscaled_group(&self, item: usize, group: usize) -> f64 {
        if self.scale_factor == 0.0 {
            0.0
        } else {
            self.groups[item][group] / self.scale_factor
        }
    }

    /// CSV dump with a leading `#kind:` row marking user and group columns.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), RatingError> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        let mut kinds = vec!["#kind:".to_owned()];
        kinds.extend(self.column_kinds().iter().map(|k| match k {
            ColumnKind::User => "user".to_owned(),
            ColumnKind::Group => "group".to_owned(),
        }));
        w.write_record(&kinds)?;
        let mut header = vec!["item_id".to_owned()];
        header.extend(self.ratings.user_ids().iter().cloned());
        header.extend((0..self.k).map(|g| format!("g{g}")));
        w.write_record(&header)?;
        for (i, id) in self.ratings.item_ids().iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend((0..self.ratings.n_users()).map(|u| self.ratings.get(i, u).map_or(String::new(), |r| r.to_string())));
            rec.extend(self.group_row(i).iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Appends `groups`, multiplied by `scale_factor`, as extra columns.
///
/// The group matrix must cover exactly the rating matrix's items (in any
/// order) unless it has no columns at all.
pub fn extend(ratings: &RatingMatrix, groups: &GroupRatingMatrix, scale_factor: f64) -> Result<ExtendedMatrix, RatingError> {
    if !(scale_factor.is_finite() && scale_factor >= 0.0) {
        return Err(RatingError::BadScaleFactor(scale_factor));
    }
    let k = groups.k;
    let aligned = if k == 0 {
        Vec::new()
    } else {
        if groups.items.len() != ratings.n_items() {
            return Err(RatingError::ItemMismatch);
        }
        let mut aligned = vec![Vec::new(); ratings.n_items()];
        for (id, row) in groups.items.iter().zip(&groups.values) {
            let i = ratings.item_index(id).ok_or(RatingError::ItemMismatch)?;
            if !aligned[i].is_empty() {
                return Err(RatingError::ItemMismatch);
            }
            aligned[i] = row.iter().map(|v| v * scale_factor).collect();
        }
        aligned
    };
    Ok(ExtendedMatrix {
        ratings: ratings.clone(),
        groups: aligned,
        k,
        scale_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<RatingMatrix, RatingError> {
        read_ratings(csv::Reader::from_reader(text.as_bytes()), RatingScale::default())
    }

    #[test]
    fn loads_first_figure_row() {
        let m = parse("user_id,item_id,rating\nTom,Clothes1,3\nBill,Clothes1,2\n").unwrap();
        let c1 = m.item_index("Clothes1").unwrap();
        assert_eq!(m.get(c1, m.user_index("Tom").unwrap()), Some(3.0));
        assert_eq!(m.get(c1, m.user_index("Bill").unwrap()), Some(2.0));
        assert_eq!(m.len(), 2);
        assert_eq!(m.item_mean(c1), Some(2.5));
    }

    #[test]
    fn header_only_is_empty_and_errors_are_reported() {
        assert!(parse("user_id,item_id,rating\n").unwrap().is_empty());
        assert!(matches!(parse("user_id,item_id,rating\nTom,A,9\n"), Err(RatingError::OutOfScale { .. })));
        assert!(matches!(
            parse("user_id,item_id,rating\nTom,A,3\nTom,A,4\n"),
            Err(RatingError::Duplicate { .. })
        ));
        assert!(matches!(parse("user_id,item_id,rating\nTom,A,x\n"), Err(RatingError::Parse { line: 2, .. })));
        assert!(matches!(parse("a,b,c\n"), Err(RatingError::Parse { line: 1, .. })));
    }

    #[test]
    fn group_matrix_copies_memberships() {
        let m = MembershipMatrix::from_pro(vec![vec![0.357, 0.189], vec![0.222, 0.45]]).unwrap();
        let ids = vec!["Clothes1".to_owned(), "Clothes2".to_owned()];
        let g = build_group_matrix(&m, &ids).unwrap();
        assert_eq!(g.value_for("Clothes1", 0), Some(0.357));
        assert_eq!(g.value_for("Clothes1", 1), Some(0.189));
        let zero = build_group_matrix(&MembershipMatrix::from_pro(vec![vec![0.0; 3]; 2]).unwrap(), &ids).unwrap();
        assert!((0..2).all(|i| zero.row(i) == [0.0; 3]));
        let ident = build_group_matrix(&MembershipMatrix::from_pro(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), &ids).unwrap();
        assert!((0..2).all(|i| ident.row(i).iter().filter(|&&v| v == 1.0).count() == 1));
        assert!(build_group_matrix(&m, &ids[..1]).is_err());
    }

    fn two_items() -> RatingMatrix {
        let mut r = RatingMatrix::new(RatingScale::default());
        r.insert("Clothes1", "Tom", 3.0).unwrap();
        r.insert("Clothes2", "Lily", 1.0).unwrap();
        r
    }

    #[test]
    fn extend_scales_and_aligns_groups() {
        let r = two_items();
        // reversed order relative to the rating matrix
        let g = GroupRatingMatrix::new(
            vec!["Clothes2".into(), "Clothes1".into()],
            vec![vec![0.222, 0.45], vec![0.357, 0.189]],
        )
        .unwrap();
        let e = extend(&r, &g, 5.0).unwrap();
        assert_eq!(e.group_row(0)[0], 0.357 * 5.0);
        assert!((e.group_row(0)[0] - 1.785).abs() < 1e-12);
        assert_eq!(e.n_columns(), 2 + 2);
        assert_eq!(e.column_kinds(), vec![ColumnKind::User, ColumnKind::User, ColumnKind::Group, ColumnKind::Group]);
        assert_eq!(e.ratings(), &r);
        assert!((e.unscaled_group(0, 0) - 0.357).abs() < 1e-15);

        let same = extend(&r, &g, 1.0).unwrap();
        assert_eq!(same.group_row(1), &[0.222, 0.45]);

        let plain = extend(&r, &GroupRatingMatrix::empty(), 5.0).unwrap();
        assert_eq!(plain.n_columns(), r.n_users());
        assert_eq!(plain.ratings(), &r);

        let wrong = GroupRatingMatrix::new(vec!["Clothes9".into(), "Clothes1".into()], vec![vec![0.1], vec![0.2]]).unwrap();
        assert!(matches!(extend(&r, &wrong, 5.0), Err(RatingError::ItemMismatch)));
        assert!(matches!(extend(&r, &g, -1.0), Err(RatingError::BadScaleFactor(_))));
    }

    #[test]
    fn export_marks_column_kinds() {
        let g = GroupRatingMatrix::new(vec!["Clothes1".into(), "Clothes2".into()], vec![vec![0.5], vec![0.25]]).unwrap();
        let e = extend(&two_items(), &g, 2.0).unwrap();
        let mut out = Vec::new();
        e.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "#kind:,user,user,group");
        assert_eq!(lines[1], "item_id,Tom,Lily,g0");
        assert_eq!(lines[2], "Clothes1,3,,1");
        assert_eq!(lines[3], "Clothes2,,1,0.5");
    }

    #[test]
    fn groups_csv_round_trip() {
        let g = GroupRatingMatrix::new(vec!["a".into(), "b".into()], vec![vec![0.1, 0.9], vec![1.0, 0.0]]).unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        write_groups(&g, &mut w).unwrap();
        let bytes = w.into_inner().unwrap();
        assert!(bytes.starts_with(b"item_id,g0,g1\n"));
        assert_eq!(read_groups(csv::Reader::from_reader(bytes.as_slice())).unwrap(), g);
    }

    proptest! {
        #[test]
        fn ratings_round_trip(cells in proptest::collection::btree_map((0usize..12, 0usize..9), 1u8..=5, 0..40)) {
            let mut m = RatingMatrix::new(RatingScale::default());
            for (&(i, u), &r) in &cells {
                m.insert(&format!("item{i}"), &format!("user{u}"), f64::from(r)).unwrap();
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            write_ratings(&m, &mut w).unwrap();
            let bytes = w.into_inner().unwrap();
            let back = read_ratings(csv::Reader::from_reader(bytes.as_slice()), RatingScale::default()).unwrap();
            let mut a: Vec<_> = m.entries().map(|(i, u, r)| (i.to_owned(), u.to_owned(), r)).collect();
            let mut b: Vec<_> = back.entries().map(|(i, u, r)| (i.to_owned(), u.to_owned(), r)).collect();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
