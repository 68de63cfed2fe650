//! Per-class output embedding tables: loading, normalization, binarization.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1};

use crate::class::{ClassId, ClassVocab};
use crate::error::{Error, Result};
use crate::io_util;

/// What a table's rows encode. `AttributesBinary` rows are restricted to
/// {0,1}; the other kinds carry arbitrary finite reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    AttributesBinary,
    AttributesContinuous,
    Bow,
    WordVector,
    Hierarchy,
    Concatenated,
}

impl EmbeddingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmbeddingKind::AttributesBinary => "attributes-binary",
            EmbeddingKind::AttributesContinuous => "attributes-continuous",
            EmbeddingKind::Bow => "bow",
            EmbeddingKind::WordVector => "word-vector",
            EmbeddingKind::Hierarchy => "hierarchy",
            EmbeddingKind::Concatenated => "concatenated",
        }
    }
}

impl std::fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbeddingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attributes-binary" => Ok(EmbeddingKind::AttributesBinary),
            "attributes-continuous" => Ok(EmbeddingKind::AttributesContinuous),
            "bow" => Ok(EmbeddingKind::Bow),
            "word-vector" => Ok(EmbeddingKind::WordVector),
            "hierarchy" => Ok(EmbeddingKind::Hierarchy),
            "concatenated" => Ok(EmbeddingKind::Concatenated),
            other => Err(Error::invalid(format!("unknown embedding kind '{other}'"))),
        }
    }
}

/// One E-dimensional vector per class: the φ(y) side of the compatibility.
/// Rows are kept in ascending [`ClassId`] order and validated finite;
/// binary tables additionally only hold values in {0,1}.
#[derive(Debug, Clone)]
pub struct OutputEmbeddingTable {
    kind: EmbeddingKind,
    dim: usize,
    classes: Vec<ClassId>,
    rows: Vec<Array1<f64>>,
    index: HashMap<ClassId, usize>,
}

impl OutputEmbeddingTable {
    /// Builds a table from (class, row) pairs, validating the invariants.
    pub fn from_rows(kind: EmbeddingKind, mut pairs: Vec<(ClassId, Array1<f64>)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("output embedding table must be non-empty"));
        }
        let dim = pairs[0].1.len();
        if dim == 0 {
            return Err(Error::invalid("embedding dimension E must be positive"));
        }
        pairs.sort_by_key(|(id, _)| *id);
        let mut classes = Vec::with_capacity(pairs.len());
        let mut rows = Vec::with_capacity(pairs.len());
        let mut index = HashMap::with_capacity(pairs.len());
        for (id, row) in pairs {
            if index.contains_key(&id) {
                return Err(Error::invalid(format!("duplicate class id {id} in table")));
            }
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "row length mismatch for class {id}: expected {dim}, got {}",
                    row.len()
                )));
            }
            if !row.iter().all(|v| v.is_finite()) {
                return Err(Error::invalid(format!(
                    "non-finite embedding value for class {id}"
                )));
            }
            if kind == EmbeddingKind::AttributesBinary
                && !row.iter().all(|&v| v == 0.0 || v == 1.0)
            {
                return Err(Error::invalid(format!(
                    "binary attribute row for class {id} contains a value outside {{0,1}}"
                )));
            }
            index.insert(id, rows.len());
            classes.push(id);
            rows.push(row);
        }
        Ok(Self {
            kind,
            dim,
            classes,
            rows,
            index,
        })
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Class ids in ascending order.
    pub fn classes(&self) -> &[ClassId] {
        &self.classes
    }

    pub fn class_set(&self) -> BTreeSet<ClassId> {
        self.classes.iter().copied().collect()
    }

    pub fn contains(&self, id: ClassId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn row(&self, id: ClassId) -> Option<ArrayView1<'_, f64>> {
        self.index.get(&id).map(|&i| self.rows[i].view())
    }

    /// (class, row) pairs in ascending class order.
    pub fn iter(&self) -> impl Iterator<Item = (ClassId, ArrayView1<'_, f64>)> + '_ {
        self.classes
            .iter()
            .copied()
            .zip(self.rows.iter().map(|r| r.view()))
    }

    /// Errors unless every id in `required` has a row.
    pub fn require_classes<'a>(
        &self,
        required: impl IntoIterator<Item = &'a ClassId>,
        vocab: &ClassVocab,
    ) -> Result<()> {
        for id in required {
            if !self.contains(*id) {
                return Err(Error::invalid(format!(
                    "embedding table ({}) is missing class '{}'",
                    self.kind,
                    vocab.name(*id)
                )));
            }
        }
        Ok(())
    }

    pub fn require_kind(&self, kind: EmbeddingKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::invalid(format!(
                "expected a {kind} table, found {}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Scales every row to unit Euclidean norm. Zero rows are left untouched
/// and reported back so callers can surface a warning; they are not an
/// error because a class absent from a corpus should degrade, not abort.
pub fn l2_normalize_rows(table: &OutputEmbeddingTable) -> (OutputEmbeddingTable, Vec<ClassId>) {
    let mut zero_rows = Vec::new();
    let pairs = table
        .iter()
        .map(|(id, row)| {
            let norm = row.dot(&row).sqrt();
            if norm == 0.0 {
                zero_rows.push(id);
                (id, row.to_owned())
            } else {
                (id, row.mapv(|v| v / norm))
            }
        })
        .collect();
    let normalized = OutputEmbeddingTable::from_rows(table.kind(), pairs)
        .expect("normalizing a valid table preserves its invariants");
    (normalized, zero_rows)
}

/// Thresholds continuous attributes around the per-attribute mean over all
/// classes in the table: strictly above the mean maps to 1, everything
/// else (including ties) to 0.
pub fn binarize_attributes(table: &OutputEmbeddingTable) -> Result<OutputEmbeddingTable> {
    table.require_kind(EmbeddingKind::AttributesContinuous)?;
    let n = table.len() as f64;
    let mut means = Array1::<f64>::zeros(table.dim());
    for (_, row) in table.iter() {
        means += &row;
    }
    means /= n;
    let pairs = table
        .iter()
        .map(|(id, row)| {
            let bits = Array1::from_iter(
                row.iter()
                    .zip(means.iter())
                    .map(|(&v, &m)| if v > m { 1.0 } else { 0.0 }),
            );
            (id, bits)
        })
        .collect();
    OutputEmbeddingTable::from_rows(EmbeddingKind::AttributesBinary, pairs)
}

/// Reads an embedding table file: `E=<int> kind=<tag>` then one
/// `class_name<TAB>v1,...,vE` line per class. New class names are
/// registered in `vocab`.
pub fn load_output_table(path: &Path, vocab: &mut ClassVocab) -> Result<OutputEmbeddingTable> {
    let contents = io_util::read_file(path)?;
    let mut lines = contents.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file, expected 'E=<int> kind=<tag>'"))?;
    let mut fields = header.split_whitespace();
    let dim: usize = fields
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing 'E=<int>'"))
        .and_then(|f| {
            io_util::parse_keyed(f, "E")
                .and_then(|v| v.parse().map_err(|_| format!("invalid integer '{v}'")))
                .map_err(|m| Error::parse(path, 1, m))
        })?;
    let kind: EmbeddingKind = fields
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing 'kind=<tag>'"))
        .and_then(|f| {
            io_util::parse_keyed(f, "kind")
                .map_err(|m| Error::parse(path, 1, m))
                .and_then(|v| v.parse().map_err(|e| Error::parse(path, 1, format!("{e}"))))
        })?;
    if dim == 0 {
        return Err(Error::parse(path, 1, "E must be positive"));
    }

    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (name, values) = line.split_once('\t').ok_or_else(|| {
            Error::parse(path, lineno, "expected 'class_name<TAB>v1,...,vE'")
        })?;
        if !seen.insert(name.to_string()) {
            return Err(Error::parse(path, lineno, format!("duplicate class '{name}'")));
        }
        let id = vocab
            .intern(name)
            .map_err(|e| Error::parse(path, lineno, format!("{e}")))?;
        let row = io_util::parse_floats(values, ',')
            .map_err(|m| Error::parse(path, lineno, m))?;
        if row.len() != dim {
            return Err(Error::parse(
                path,
                lineno,
                format!("row length mismatch: expected {dim} values, got {}", row.len()),
            ));
        }
        if kind == EmbeddingKind::AttributesBinary
            && !row.iter().all(|&v| v == 0.0 || v == 1.0)
        {
            return Err(Error::parse(
                path,
                lineno,
                "attributes-binary row contains a value outside {0,1}",
            ));
        }
        pairs.push((id, Array1::from_vec(row)));
    }
    if pairs.is_empty() {
        return Err(Error::parse(path, 1, "table has no class rows"));
    }
    OutputEmbeddingTable::from_rows(kind, pairs)
}

/// Writes a table in the format read by [`load_output_table`]. Rows are
/// emitted in ascending class-name order so files are canonical regardless
/// of id assignment.
pub fn write_output_table(
    table: &OutputEmbeddingTable,
    vocab: &ClassVocab,
    path: &Path,
) -> Result<()> {
    let mut named: Vec<(&str, ArrayView1<'_, f64>)> = table
        .iter()
        .map(|(id, row)| (vocab.name(id), row))
        .collect();
    named.sort_by_key(|(name, _)| *name);
    let mut out = format!("E={} kind={}\n", table.dim(), table.kind());
    for (name, row) in named {
        out.push_str(name);
        out.push('\t');
        out.push_str(&io_util::join_floats(row.as_slice().unwrap(), ','));
        out.push('\n');
    }
    io_util::write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn table(kind: EmbeddingKind, rows: Vec<(usize, Vec<f64>)>) -> OutputEmbeddingTable {
        OutputEmbeddingTable::from_rows(
            kind,
            rows.into_iter()
                .map(|(id, v)| (ClassId(id), Array1::from_vec(v)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn normalize_unit_rows() {
        let t = table(
            EmbeddingKind::AttributesContinuous,
            vec![(0, vec![3.0, 4.0]), (1, vec![1.0, 0.0])],
        );
        let (n, zeros) = l2_normalize_rows(&t);
        assert!(zeros.is_empty());
        assert_eq!(n.row(ClassId(0)).unwrap(), array![0.6, 0.8].view());
        assert_eq!(n.row(ClassId(1)).unwrap(), array![1.0, 0.0].view());
    }

    #[test]
    fn normalize_reports_zero_rows() {
        let t = table(
            EmbeddingKind::Bow,
            vec![(0, vec![0.0, 0.0]), (1, vec![2.0, 0.0])],
        );
        let (n, zeros) = l2_normalize_rows(&t);
        assert_eq!(zeros, vec![ClassId(0)]);
        assert_eq!(n.row(ClassId(0)).unwrap(), array![0.0, 0.0].view());
        assert_eq!(n.row(ClassId(1)).unwrap(), array![1.0, 0.0].view());
    }

    #[test]
    fn normalized_rows_have_unit_norm() {
        let t = table(
            EmbeddingKind::Hierarchy,
            vec![
                (0, vec![0.3, -2.5, 7.0]),
                (1, vec![1e-8, 0.0, 0.0]),
                (2, vec![-4.0, 4.0, 4.0]),
            ],
        );
        let (n, zeros) = l2_normalize_rows(&t);
        assert!(zeros.is_empty());
        for (_, row) in n.iter() {
            let norm = row.dot(&row).sqrt();
            assert!((norm - 1.0).abs() <= 1e-9, "norm {norm}");
        }
    }

    // big=(2,10,90) over rat/monkey/whale thresholds to (0,0,1): the mean
    // is 34 and only whale exceeds it.
    #[test]
    fn binarize_rat_monkey_whale() {
        let t = table(
            EmbeddingKind::AttributesContinuous,
            vec![(0, vec![2.0]), (1, vec![10.0]), (2, vec![90.0])],
        );
        let b = binarize_attributes(&t).unwrap();
        assert_eq!(b.kind(), EmbeddingKind::AttributesBinary);
        assert_eq!(b.row(ClassId(0)).unwrap()[0], 0.0);
        assert_eq!(b.row(ClassId(1)).unwrap()[0], 0.0);
        assert_eq!(b.row(ClassId(2)).unwrap()[0], 1.0);
    }

    #[test]
    fn binarize_constant_column_is_all_zero() {
        let t = table(
            EmbeddingKind::AttributesContinuous,
            vec![(0, vec![5.0]), (1, vec![5.0]), (2, vec![5.0])],
        );
        let b = binarize_attributes(&t).unwrap();
        for (_, row) in b.iter() {
            assert_eq!(row[0], 0.0);
        }
    }

    #[test]
    fn binarize_zero_one_column_unchanged() {
        let t = table(
            EmbeddingKind::AttributesContinuous,
            vec![(0, vec![0.0]), (1, vec![1.0])],
        );
        let b = binarize_attributes(&t).unwrap();
        assert_eq!(b.row(ClassId(0)).unwrap()[0], 0.0);
        assert_eq!(b.row(ClassId(1)).unwrap()[0], 1.0);
    }

    #[test]
    fn binarize_requires_continuous_kind() {
        let t = table(EmbeddingKind::Bow, vec![(0, vec![1.0])]);
        assert!(binarize_attributes(&t).is_err());
    }

    // Re-binarizing a 0/1 table (viewed as continuous) leaves entries in
    // {0,1}; only columns the mean rule forces to constant-zero change.
    #[test]
    fn binarize_idempotent_up_to_constant_columns() {
        let t = table(
            EmbeddingKind::AttributesContinuous,
            vec![(0, vec![0.0, 1.0, 3.0]), (1, vec![1.0, 1.0, 9.0])],
        );
        let once = binarize_attributes(&t).unwrap();
        let as_continuous = OutputEmbeddingTable::from_rows(
            EmbeddingKind::AttributesContinuous,
            once.iter().map(|(id, r)| (id, r.to_owned())).collect(),
        )
        .unwrap();
        let twice = binarize_attributes(&as_continuous).unwrap();
        // column 0 distinguishes classes and survives; column 1 was
        // constant after the first pass and stays 0; column 2 mirrors 0.
        assert_eq!(twice.row(ClassId(0)).unwrap(), array![0.0, 0.0, 0.0].view());
        assert_eq!(twice.row(ClassId(1)).unwrap(), array![1.0, 0.0, 1.0].view());
    }

    #[test]
    fn binary_kind_rejects_fractional_values() {
        let err = OutputEmbeddingTable::from_rows(
            EmbeddingKind::AttributesBinary,
            vec![(ClassId(0), array![0.5])],
        );
        assert!(err.is_err());
    }

    #[test]
    fn duplicate_class_rejected() {
        let err = OutputEmbeddingTable::from_rows(
            EmbeddingKind::Bow,
            vec![(ClassId(0), array![1.0]), (ClassId(0), array![2.0])],
        );
        assert!(err.is_err());
    }

    #[test]
    fn load_and_write_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("attrs.tsv");
        std::fs::write(&path, "E=3 kind=attributes-continuous\nwhale\t1,2.5,3\nrat\t-1,0,4\n")
            .unwrap();
        let mut vocab = ClassVocab::new();
        let t = load_output_table(&path, &mut vocab).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(vocab.get("whale"), Some(ClassId(0)));

        let out = dir.path().join("copy.tsv");
        write_output_table(&t, &vocab, &out).unwrap();
        let mut vocab2 = ClassVocab::new();
        let t2 = load_output_table(&out, &mut vocab2).unwrap();
        // writer sorts by name, so rat comes first in the copy
        assert_eq!(vocab2.get("rat"), Some(ClassId(0)));
        assert_eq!(
            t2.row(vocab2.get("whale").unwrap()).unwrap(),
            t.row(vocab.get("whale").unwrap()).unwrap()
        );
    }

    #[test]
    fn load_rejects_bad_rows() {
        let dir = tempfile::tempdir().unwrap();

        let dup = dir.path().join("dup.tsv");
        std::fs::write(&dup, "E=1 kind=bow\na\t1\na\t2\n").unwrap();
        let err = load_output_table(&dup, &mut ClassVocab::new()).unwrap_err();
        assert!(format!("{err}").contains("duplicate class"), "{err}");

        let short = dir.path().join("short.tsv");
        std::fs::write(&short, "E=2 kind=bow\na\t1\n").unwrap();
        let err = load_output_table(&short, &mut ClassVocab::new()).unwrap_err();
        assert!(format!("{err}").contains("row length mismatch"), "{err}");
        assert!(format!("{err}").contains(":2:"), "line number in {err}");

        let frac = dir.path().join("frac.tsv");
        std::fs::write(&frac, "E=1 kind=attributes-binary\na\t0.5\n").unwrap();
        assert!(load_output_table(&frac, &mut ClassVocab::new()).is_err());
    }
}
