//! A small in-process table engine with DataFrame-style operators.
//!
//! Tables are immutable row collections split into partitions. Operators run
//! partition-at-a-time on a dedicated worker pool. Key-based operators
//! (equi-join, group-by, distinct) hash-repartition their input first, the
//! in-process analog of a shuffle; joins without equality keys broadcast the
//! smaller side to every partition of the larger one and never shuffle.
//!
//! Results are multisets: the order of output rows depends on the partition
//! layout, their contents do not. Aggregations merge partial states in
//! partition order, so for a fixed partition count the output is bitwise
//! reproducible regardless of how many workers execute it.

use std::cmp::Ordering;
use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{BuildHasherDefault, Hash, Hasher};
use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

/// Fixed-key hasher so repartitioning is identical from run to run.
type StableState = BuildHasherDefault<DefaultHasher>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DataflowError {
    #[error("column name collision: {}", .0.join(", "))]
    ColumnCollision(Vec<String>),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{column}` is not array-typed")]
    NotArray { column: String },
    #[error("row {row} does not conform to the schema")]
    SchemaMismatch { row: usize },
    #[error("rename expects {expected} names, got {got}")]
    RenameArity { expected: usize, got: usize },
    #[error("join key count differs: {left} left vs {right} right")]
    KeyArity { left: usize, right: usize },
    #[error("invalid execution config: {0}")]
    InvalidConfig(String),
    #[error("failed to start worker pool: {0}")]
    ThreadPool(String),
}

pub type Result<T, E = DataflowError> = std::result::Result<T, E>;

/// A single cell.
///
/// Floats compare and hash by bit pattern so that every value can be used as
/// a grouping or distinct key.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Pair(f64, f64),
    Tuple(Vec<Value>),
    Array(Vec<Value>),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(f64, f64)> {
        match self {
            Value::Pair(a, b) => Some((*a, *b)),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[Value]> {
        match self {
            Value::Array(v) => Some(v),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Int(_) => 0,
            Value::Float(_) => 1,
            Value::Pair(..) => 2,
            Value::Tuple(_) => 3,
            Value::Array(_) => 4,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Pair(a0, a1), Value::Pair(b0, b1)) => {
                a0.total_cmp(b0).then_with(|| a1.total_cmp(b1))
            }
            (Value::Tuple(a), Value::Tuple(b)) | (Value::Array(a), Value::Array(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Int(v) => v.hash(state),
            Value::Float(v) => v.to_bits().hash(state),
            Value::Pair(a, b) => {
                a.to_bits().hash(state);
                b.to_bits().hash(state);
            }
            Value::Tuple(v) | Value::Array(v) => v.hash(state),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    Int,
    Float,
    Pair,
    Tuple(Vec<ColumnKind>),
    Array(Box<ColumnKind>),
}

impl ColumnKind {
    pub fn array_of(inner: ColumnKind) -> Self {
        ColumnKind::Array(Box::new(inner))
    }

    pub fn admits(&self, value: &Value) -> bool {
        match (self, value) {
            (ColumnKind::Int, Value::Int(_))
            | (ColumnKind::Float, Value::Float(_))
            | (ColumnKind::Pair, Value::Pair(..)) => true,
            (ColumnKind::Tuple(kinds), Value::Tuple(values)) => {
                kinds.len() == values.len() && kinds.iter().zip(values).all(|(k, v)| k.admits(v))
            }
            (ColumnKind::Array(inner), Value::Array(values)) => values.iter().all(|v| inner.admits(v)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self { name: name.into(), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut dups: Vec<String> = columns
            .iter()
            .filter(|c| !seen.insert(c.name.as_str()))
            .map(|c| c.name.clone())
            .collect();
        if !dups.is_empty() {
            dups.dedup();
            return Err(DataflowError::ColumnCollision(dups));
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| DataflowError::UnknownColumn(name.to_string()))
    }

    pub fn conforms(&self, row: &[Value]) -> bool {
        row.len() == self.columns.len()
            && self.columns.iter().zip(row).all(|(c, v)| c.kind.admits(v))
    }

    /// Column-wise concatenation; fails listing every shared name.
    pub fn concat(&self, other: &Schema) -> Result<Schema> {
        let mine: HashSet<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let colliding: Vec<String> = other
            .columns
            .iter()
            .filter(|c| mine.contains(c.name.as_str()))
            .map(|c| c.name.clone())
            .collect();
        if !colliding.is_empty() {
            return Err(DataflowError::ColumnCollision(colliding));
        }
        let mut columns = self.columns.clone();
        columns.extend(other.columns.iter().cloned());
        Ok(Schema { columns })
    }

    pub fn renamed(&self, names: &[&str]) -> Result<Schema> {
        if names.len() != self.columns.len() {
            return Err(DataflowError::RenameArity {
                expected: self.columns.len(),
                got: names.len(),
            });
        }
        Schema::new(
            self.columns
                .iter()
                .zip(names)
                .map(|(c, n)| Column::new(*n, c.kind.clone()))
                .collect(),
        )
    }
}

pub type Row = Vec<Value>;

/// An immutable, partitioned multiset of rows.
#[derive(Clone)]
pub struct Table {
    schema: Schema,
    rows: Vec<Row>,
    partitions: Vec<Range<usize>>,
}

impl fmt::Debug for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Table")
            .field("columns", &self.schema.columns.iter().map(|c| &c.name).collect::<Vec<_>>())
            .field("rows", &self.rows.len())
            .field("partitions", &self.partitions.len())
            .finish()
    }
}

impl Table {
    fn from_buckets(schema: Schema, buckets: Vec<Vec<Row>>) -> Table {
        let total = buckets.iter().map(Vec::len).sum();
        let mut rows = Vec::with_capacity(total);
        let mut partitions = Vec::with_capacity(buckets.len());
        for bucket in buckets {
            let start = rows.len();
            rows.extend(bucket);
            partitions.push(start..rows.len());
        }
        Table { schema, rows, partitions }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_partitions(&self) -> usize {
        self.partitions.len()
    }

    pub fn partition(&self, index: usize) -> &[Row] {
        &self.rows[self.partitions[index].clone()]
    }

    fn partition_slices(&self) -> Vec<&[Row]> {
        self.partitions.iter().map(|r| &self.rows[r.clone()]).collect()
    }

    /// Same rows under new column names, like `withColumnRenamed` applied to
    /// every column at once.
    pub fn rename(self, names: &[&str]) -> Result<Table> {
        Ok(Table { schema: self.schema.renamed(names)?, ..self })
    }

    /// Rows in a canonical order, for multiset comparisons.
    pub fn sorted_rows(&self) -> Vec<Row> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    pub workers: usize,
    pub target_partitions: usize,
}

impl ExecConfig {
    /// `workers` threads and four partitions per worker.
    pub fn new(workers: usize) -> Result<Self> {
        Self::with_partitions(workers, workers.saturating_mul(4))
    }

    pub fn with_partitions(workers: usize, target_partitions: usize) -> Result<Self> {
        if workers == 0 {
            return Err(DataflowError::InvalidConfig("workers must be at least 1".into()));
        }
        if target_partitions == 0 {
            return Err(DataflowError::InvalidConfig(
                "target_partitions must be at least 1".into(),
            ));
        }
        Ok(Self { workers, target_partitions })
    }

    pub fn serial() -> Self {
        Self { workers: 1, target_partitions: 1 }
    }
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self { workers: 1, target_partitions: 4 }
    }
}

/// A user-defined aggregation.
///
/// `merge` must be associative and commutative over states; that is what
/// makes a grouped result independent of how rows were partitioned.
pub trait Fold: Sync {
    type State: Send;

    fn output_columns(&self) -> Vec<Column>;
    fn init(&self) -> Self::State;
    fn step(&self, state: &mut Self::State, row: &[Value]);
    fn merge(&self, left: Self::State, right: Self::State) -> Self::State;
    fn finish(&self, state: Self::State) -> Vec<Value>;
}

/// Number of rows.
pub struct Count {
    name: String,
}

impl Count {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into() }
    }
}

impl Fold for Count {
    type State = i64;

    fn output_columns(&self) -> Vec<Column> {
        vec![Column::new(self.name.clone(), ColumnKind::Int)]
    }
    fn init(&self) -> i64 {
        0
    }
    fn step(&self, state: &mut i64, _row: &[Value]) {
        *state += 1;
    }
    fn merge(&self, left: i64, right: i64) -> i64 {
        left + right
    }
    fn finish(&self, state: i64) -> Vec<Value> {
        vec![Value::Int(state)]
    }
}

/// Sum and row count of a numeric column, as `(name, name_count)`.
///
/// Int columns are accumulated as floats.
pub struct SumCount {
    column: usize,
    name: String,
}

impl SumCount {
    pub fn new(schema: &Schema, column: &str, name: impl Into<String>) -> Result<Self> {
        Ok(Self { column: schema.index_of(column)?, name: name.into() })
    }
}

impl Fold for SumCount {
    type State = (f64, i64);

    fn output_columns(&self) -> Vec<Column> {
        vec![
            Column::new(self.name.clone(), ColumnKind::Float),
            Column::new(format!("{}_count", self.name), ColumnKind::Int),
        ]
    }
    fn init(&self) -> (f64, i64) {
        (0.0, 0)
    }
    fn step(&self, state: &mut (f64, i64), row: &[Value]) {
        let v = match &row[self.column] {
            Value::Float(v) => *v,
            Value::Int(v) => *v as f64,
            _ => f64::NAN,
        };
        state.0 += v;
        state.1 += 1;
    }
    fn merge(&self, left: (f64, i64), right: (f64, i64)) -> (f64, i64) {
        (left.0 + right.0, left.1 + right.1)
    }
    fn finish(&self, state: (f64, i64)) -> Vec<Value> {
        vec![Value::Float(state.0), Value::Int(state.1)]
    }
}

/// Gathers one or more columns of every row into an array, like
/// `collect_list`. Multiple columns are packed as tuples.
pub struct CollectList {
    columns: Vec<usize>,
    element: ColumnKind,
    name: String,
}

impl CollectList {
    pub fn new(schema: &Schema, columns: &[&str], name: impl Into<String>) -> Result<Self> {
        let indices = columns
            .iter()
            .map(|c| schema.index_of(c))
            .collect::<Result<Vec<_>>>()?;
        let element = match indices.as_slice() {
            [single] => schema.columns[*single].kind.clone(),
            many => ColumnKind::Tuple(many.iter().map(|&i| schema.columns[i].kind.clone()).collect()),
        };
        Ok(Self { columns: indices, element, name: name.into() })
    }
}

impl Fold for CollectList {
    type State = Vec<Value>;

    fn output_columns(&self) -> Vec<Column> {
        vec![Column::new(self.name.clone(), ColumnKind::array_of(self.element.clone()))]
    }
    fn init(&self) -> Vec<Value> {
        Vec::new()
    }
    fn step(&self, state: &mut Vec<Value>, row: &[Value]) {
        match self.columns.as_slice() {
            [single] => state.push(row[*single].clone()),
            many => state.push(Value::Tuple(many.iter().map(|&i| row[i].clone()).collect())),
        }
    }
    fn merge(&self, mut left: Vec<Value>, right: Vec<Value>) -> Vec<Value> {
        left.extend(right);
        left
    }
    fn finish(&self, state: Vec<Value>) -> Vec<Value> {
        vec![Value::Array(state)]
    }
}

fn key_of(row: &[Value], key_idx: &[usize]) -> Vec<Value> {
    key_idx.iter().map(|&i| row[i].clone()).collect()
}

fn bucket_of<K: Hash + ?Sized>(key: &K, buckets: usize) -> usize {
    let mut h = DefaultHasher::new();
    key.hash(&mut h);
    (h.finish() % buckets as u64) as usize
}

fn concat_rows(left: &[Value], right: &[Value]) -> Row {
    let mut row = Vec::with_capacity(left.len() + right.len());
    row.extend_from_slice(left);
    row.extend_from_slice(right);
    row
}

/// Runs operators on a fixed-size worker pool.
pub struct Executor {
    config: ExecConfig,
    pool: rayon::ThreadPool,
}

impl fmt::Debug for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Executor").field("config", &self.config).finish()
    }
}

impl Executor {
    pub fn new(config: ExecConfig) -> Result<Self> {
        ExecConfig::with_partitions(config.workers, config.target_partitions)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .thread_name(|i| format!("dataflow-{i}"))
            .build()
            .map_err(|e| DataflowError::ThreadPool(e.to_string()))?;
        Ok(Self { config, pool })
    }

    pub fn config(&self) -> ExecConfig {
        self.config
    }

    /// Runs `f` inside this executor's pool, so nested rayon work uses its
    /// workers.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Validates `rows` against `schema` and splits them into contiguous
    /// partitions.
    pub fn table(&self, schema: Schema, rows: Vec<Row>) -> Result<Table> {
        if let Some(row) = rows.iter().position(|r| !schema.conforms(r)) {
            return Err(DataflowError::SchemaMismatch { row });
        }
        let parts = self.config.target_partitions;
        let chunk = rows.len().div_ceil(parts).max(1);
        let partitions = (0..parts)
            .map(|p| (p * chunk).min(rows.len())..((p + 1) * chunk).min(rows.len()))
            .collect();
        Ok(Table { schema, rows, partitions })
    }

    fn repartition(&self, table: &Table, key_idx: &[usize]) -> Vec<Vec<Row>> {
        let n = self.config.target_partitions;
        let scattered: Vec<Vec<Vec<Row>>> = self.pool.install(|| {
            table
                .partition_slices()
                .into_par_iter()
                .map(|part| {
                    let mut out = vec![Vec::new(); n];
                    for row in part {
                        let b = if key_idx.is_empty() {
                            bucket_of(row, n)
                        } else {
                            bucket_of(&key_of(row, key_idx), n)
                        };
                        out[b].push(row.clone());
                    }
                    out
                })
                .collect()
        });
        gather_buckets(scattered, n)
    }

    /// Joins two tables on optional equality keys and an arbitrary row-pair
    /// predicate. Output rows are `left ++ right`.
    pub fn join<P>(
        &self,
        left: &Table,
        right: &Table,
        equi_keys: Option<&[(&str, &str)]>,
        predicate: P,
    ) -> Result<Table>
    where
        P: Fn(&[Value], &[Value]) -> bool + Sync,
    {
        let schema = left.schema.concat(&right.schema)?;
        match equi_keys {
            Some(keys) if !keys.is_empty() => {
                let lk = keys
                    .iter()
                    .map(|(l, _)| left.schema.index_of(l))
                    .collect::<Result<Vec<_>>>()?;
                let rk = keys
                    .iter()
                    .map(|(_, r)| right.schema.index_of(r))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.hash_join(schema, left, right, &lk, &rk, &predicate))
            }
            _ => Ok(self.broadcast_join(schema, left, right, &predicate)),
        }
    }

    fn hash_join<P>(
        &self,
        schema: Schema,
        left: &Table,
        right: &Table,
        lk: &[usize],
        rk: &[usize],
        predicate: &P,
    ) -> Table
    where
        P: Fn(&[Value], &[Value]) -> bool + Sync,
    {
        let lparts = self.repartition(left, lk);
        let rparts = self.repartition(right, rk);
        let buckets = self.pool.install(|| {
            lparts
                .into_par_iter()
                .zip(rparts.into_par_iter())
                .map(|(lrows, rrows)| {
                    let mut index: HashMap<Vec<Value>, Vec<usize>, StableState> =
                        HashMap::default();
                    for (i, r) in rrows.iter().enumerate() {
                        index.entry(key_of(r, rk)).or_default().push(i);
                    }
                    let mut out = Vec::new();
                    for l in &lrows {
                        if let Some(matches) = index.get(&key_of(l, lk)) {
                            for &i in matches {
                                if predicate(l, &rrows[i]) {
                                    out.push(concat_rows(l, &rrows[i]));
                                }
                            }
                        }
                    }
                    out
                })
                .collect()
        });
        Table::from_buckets(schema, buckets)
    }

    fn broadcast_join<P>(&self, schema: Schema, left: &Table, right: &Table, predicate: &P) -> Table
    where
        P: Fn(&[Value], &[Value]) -> bool + Sync,
    {
        let broadcast_right = left.len() >= right.len();
        let buckets = self.pool.install(|| {
            if broadcast_right {
                left.partition_slices()
                    .into_par_iter()
                    .map(|part| {
                        let mut out = Vec::new();
                        for l in part {
                            for r in &right.rows {
                                if predicate(l, r) {
                                    out.push(concat_rows(l, r));
                                }
                            }
                        }
                        out
                    })
                    .collect()
            } else {
                right
                    .partition_slices()
                    .into_par_iter()
                    .map(|part| {
                        let mut out = Vec::new();
                        for l in &left.rows {
                            for r in part {
                                if predicate(l, r) {
                                    out.push(concat_rows(l, r));
                                }
                            }
                        }
                        out
                    })
                    .collect()
            }
        });
        Table::from_buckets(schema, buckets)
    }

    /// One output row per element of the array column; other columns are
    /// duplicated.
    pub fn explode(&self, table: &Table, column: &str) -> Result<Table> {
        let idx = table.schema.index_of(column)?;
        let inner = match &table.schema.columns[idx].kind {
            ColumnKind::Array(inner) => (**inner).clone(),
            _ => return Err(DataflowError::NotArray { column: column.to_string() }),
        };
        let mut columns = table.schema.columns.clone();
        columns[idx].kind = inner;
        let schema = Schema { columns };
        let buckets = self.pool.install(|| {
            table
                .partition_slices()
                .into_par_iter()
                .map(|part| {
                    let mut out = Vec::new();
                    for row in part {
                        let Value::Array(items) = &row[idx] else { continue };
                        for item in items {
                            let mut r = row.clone();
                            r[idx] = item.clone();
                            out.push(r);
                        }
                    }
                    out
                })
                .collect()
        });
        Ok(Table::from_buckets(schema, buckets))
    }

    /// Per-row transformation into zero or more rows of `schema`.
    pub fn flat_map<M>(&self, table: &Table, schema: Schema, f: M) -> Result<Table>
    where
        M: Fn(&[Value], &mut Vec<Row>) + Sync,
    {
        let buckets: Vec<Vec<Row>> = self.pool.install(|| {
            table
                .partition_slices()
                .into_par_iter()
                .map(|part| {
                    let mut out = Vec::new();
                    for row in part {
                        f(row, &mut out);
                    }
                    out
                })
                .collect()
        });
        let out = Table::from_buckets(schema, buckets);
        if let Some(row) = out.rows.iter().position(|r| !out.schema.conforms(r)) {
            return Err(DataflowError::SchemaMismatch { row });
        }
        Ok(out)
    }

    pub fn filter<P>(&self, table: &Table, predicate: P) -> Table
    where
        P: Fn(&[Value]) -> bool + Sync,
    {
        let buckets = self.pool.install(|| {
            table
                .partition_slices()
                .into_par_iter()
                .map(|part| part.iter().filter(|r| predicate(r)).cloned().collect())
                .collect()
        });
        Table::from_buckets(table.schema.clone(), buckets)
    }

    /// One row per distinct key: the key columns followed by the finished
    /// fold. Partial states are built per input partition, shuffled by key,
    /// then merged in partition order.
    pub fn group_aggregate<F: Fold>(&self, table: &Table, keys: &[&str], fold: &F) -> Result<Table> {
        let key_idx = keys
            .iter()
            .map(|k| table.schema.index_of(k))
            .collect::<Result<Vec<_>>>()?;
        let key_schema = Schema {
            columns: key_idx.iter().map(|&i| table.schema.columns[i].clone()).collect(),
        };
        let schema = key_schema.concat(&Schema::new(fold.output_columns())?)?;
        let n = self.config.target_partitions;

        let scattered: Vec<Vec<Vec<(Vec<Value>, F::State)>>> = self.pool.install(|| {
            table
                .partition_slices()
                .into_par_iter()
                .map(|part| {
                    let mut slots: HashMap<Vec<Value>, usize, StableState> = HashMap::default();
                    let mut partials: Vec<(Vec<Value>, F::State)> = Vec::new();
                    for row in part {
                        let key = key_of(row, &key_idx);
                        let slot = match slots.entry(key) {
                            Entry::Occupied(e) => *e.get(),
                            Entry::Vacant(e) => {
                                partials.push((e.key().clone(), fold.init()));
                                *e.insert(partials.len() - 1)
                            }
                        };
                        fold.step(&mut partials[slot].1, row);
                    }
                    let mut out: Vec<Vec<(Vec<Value>, F::State)>> = (0..n).map(|_| Vec::new()).collect();
                    for (key, state) in partials {
                        let b = bucket_of(&key, n);
                        out[b].push((key, state));
                    }
                    out
                })
                .collect()
        });
        let gathered = gather_buckets(scattered, n);

        let buckets = self.pool.install(|| {
            gathered
                .into_par_iter()
                .map(|partials| {
                    let mut slots: HashMap<Vec<Value>, usize, StableState> = HashMap::default();
                    let mut merged: Vec<(Vec<Value>, Option<F::State>)> = Vec::new();
                    for (key, state) in partials {
                        match slots.entry(key) {
                            Entry::Occupied(e) => {
                                let slot = &mut merged[*e.get()].1;
                                let prev = slot.take().expect("slot holds a state");
                                *slot = Some(fold.merge(prev, state));
                            }
                            Entry::Vacant(e) => {
                                merged.push((e.key().clone(), Some(state)));
                                e.insert(merged.len() - 1);
                            }
                        }
                    }
                    merged
                        .into_iter()
                        .map(|(mut key, state)| {
                            key.extend(fold.finish(state.expect("slot holds a state")));
                            key
                        })
                        .collect::<Vec<Row>>()
                })
                .collect()
        });
        Ok(Table::from_buckets(schema, buckets))
    }

    /// Global aggregation over all rows; partial states are merged in
    /// partition order.
    pub fn aggregate<F: Fold>(&self, table: &Table, fold: &F) -> Vec<Value> {
        let partials: Vec<F::State> = self.pool.install(|| {
            table
                .partition_slices()
                .into_par_iter()
                .map(|part| {
                    let mut state = fold.init();
                    for row in part {
                        fold.step(&mut state, row);
                    }
                    state
                })
                .collect()
        });
        let state = partials.into_iter().fold(fold.init(), |acc, s| fold.merge(acc, s));
        fold.finish(state)
    }

    pub fn distinct(&self, table: &Table) -> Table {
        let shuffled = self.repartition(table, &[]);
        let buckets = self.pool.install(|| {
            shuffled
                .into_par_iter()
                .map(|rows| {
                    let mut seen: HashSet<&Row, StableState> = HashSet::default();
                    rows.iter().filter(|r| seen.insert(*r)).cloned().collect::<Vec<_>>()
                })
                .collect()
        });
        Table::from_buckets(table.schema.clone(), buckets)
    }

    pub fn count(&self, table: &Table) -> usize {
        table.len()
    }
}

/// Transposes per-partition scatter output into per-bucket lists, keeping
/// source partition order within each bucket.
fn gather_buckets<T>(scattered: Vec<Vec<Vec<T>>>, n: usize) -> Vec<Vec<T>> {
    let mut buckets: Vec<Vec<T>> = (0..n).map(|_| Vec::new()).collect();
    for part in scattered {
        for (b, items) in part.into_iter().enumerate() {
            buckets[b].extend(items);
        }
    }
    buckets
}
