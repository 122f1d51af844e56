use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::{csv_text, number_json};
use crate::algebra::{CubeView, ViewAxis, ViewMeasure};
use crate::number::MeasureValue;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("split {split} is out of range for {axes} axes")]
pub struct PivotError {
    pub split: usize,
    pub axes: usize,
}

/// Axes before the split become rows, the rest columns. Headers are the
/// coordinate tuples that occur in the view, in member order with `*` last.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PivotTable<T> {
    pub row_axes: Vec<ViewAxis>,
    pub column_axes: Vec<ViewAxis>,
    pub measures: Vec<ViewMeasure>,
    pub row_headers: Vec<Vec<String>>,
    pub column_headers: Vec<Vec<String>>,
    /// `body[r][c]`: the measure vector of the cell, `None` when absent.
    #[serde(skip)]
    pub body: Vec<Vec<Option<Vec<T>>>>,
}

fn rank_key(axes: &[ViewAxis], tuple: &[String]) -> Vec<usize> {
    axes.iter()
        .zip(tuple)
        .map(|(a, m)| a.members.iter().position(|x| x == m).unwrap_or(usize::MAX))
        .collect()
}

fn headers(axes: &[ViewAxis], tuples: BTreeSet<Vec<String>>) -> Vec<Vec<String>> {
    let mut v: Vec<Vec<String>> = tuples.into_iter().collect();
    v.sort_by_cached_key(|t| (rank_key(axes, t), t.clone()));
    v
}

pub fn to_pivot<T: MeasureValue>(view: &CubeView<T>, split: usize) -> Result<PivotTable<T>, PivotError> {
    if split > view.axes.len() {
        return Err(PivotError { split, axes: view.axes.len() });
    }
    let (row_axes, column_axes) = view.axes.split_at(split);
    let mut rows = BTreeSet::new();
    let mut cols = BTreeSet::new();
    if row_axes.is_empty() {
        rows.insert(Vec::new());
    }
    if column_axes.is_empty() {
        cols.insert(Vec::new());
    }
    for c in &view.cells {
        rows.insert(c.coords[..split].to_vec());
        cols.insert(c.coords[split..].to_vec());
    }
    let row_headers = headers(row_axes, rows);
    let column_headers = headers(column_axes, cols);
    let row_idx: HashMap<&[String], usize> = row_headers.iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
    let col_idx: HashMap<&[String], usize> =
        column_headers.iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
    let mut body = vec![vec![None; column_headers.len()]; row_headers.len()];
    for c in &view.cells {
        let r = row_idx[&c.coords[..split]];
        let k = col_idx[&c.coords[split..]];
        body[r][k] = Some(c.values.clone());
    }
    Ok(PivotTable {
        row_axes: row_axes.to_vec(),
        column_axes: column_axes.to_vec(),
        measures: view.measures.clone(),
        row_headers,
        column_headers,
        body,
    })
}

impl<T: MeasureValue> PivotTable<T> {
    pub fn get(&self, row: usize, column: usize) -> Option<&[T]> {
        self.body.get(row)?.get(column)?.as_deref()
    }

    fn measure_text(values: &Option<Vec<T>>) -> String {
        match values {
            None => String::new(),
            Some(v) => v.iter().map(|x| x.canonical()).collect::<Vec<_>>().join(" / "),
        }
    }

    /// Human layout: one header line per column axis, then one line per
    /// row tuple. Absent cells are blank; multiple measures are joined by
    /// ` / `.
    pub fn to_csv(&self) -> String {
        let lead = self.row_axes.len().max(1);
        let mut out = Vec::new();
        for (level, axis) in self.column_axes.iter().enumerate() {
            let mut line = vec![String::new(); lead];
            line[lead - 1] = axis.id.clone();
            line.extend(self.column_headers.iter().map(|t| t[level].clone()));
            out.push(line);
        }
        let mut head: Vec<String> = if self.row_axes.is_empty() {
            vec![String::new()]
        } else {
            self.row_axes.iter().map(|a| a.id.clone()).collect()
        };
        let names: Vec<String> = self.measures.iter().map(|m| m.name.clone()).collect();
        head.extend(std::iter::repeat_n(names.join(" / "), self.column_headers.len()));
        out.push(head);
        for (r, tuple) in self.row_headers.iter().enumerate() {
            let mut line = if tuple.is_empty() { vec![String::new()] } else { tuple.clone() };
            line.extend(self.body[r].iter().map(Self::measure_text));
            out.push(line);
        }
        csv_text(out)
    }

    pub fn to_json(&self) -> Value {
        let body: Vec<Vec<Value>> = self
            .body
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        None => Value::Null,
                        Some(v) => Value::Array(v.iter().map(number_json).collect()),
                    })
                    .collect()
            })
            .collect();
        json!({
            "row_axes": self.row_axes,
            "column_axes": self.column_axes,
            "measures": self.measures,
            "row_headers": self.row_headers,
            "column_headers": self.column_headers,
            "body": body,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{base, evaluate};
    use crate::sample;
    use crate::{Instance, View};

    fn month_category(inst: &Instance) -> crate::algebra::QueryState {
        base(inst, "sales", &[("d_date", "month"), ("d_product", "category")], None).unwrap()
    }

    fn view(f: impl Fn(&Instance, crate::algebra::QueryState) -> crate::algebra::QueryState) -> View {
        let inst = Instance::load_checked(&sample::sample_warehouse(), "").unwrap();
        let s = f(&inst, month_category(&inst));
        evaluate(&inst, &s).unwrap()
    }

    #[test]
    fn month_by_category() {
        let v = view(|_, s| s);
        let p = to_pivot(&v, 1).unwrap();
        assert_eq!(p.row_headers, [["Jan"], ["Feb"]]);
        assert_eq!(p.column_headers, [["catA"], ["catB"]]);
        let filled = p.body.iter().flatten().filter(|c| c.is_some()).count();
        assert_eq!(filled, v.len());
        for c in &v.cells {
            let r = p.row_headers.iter().position(|t| t[0] == c.coords[0]).unwrap();
            let k = p.column_headers.iter().position(|t| t[0] == c.coords[1]).unwrap();
            assert_eq!(p.get(r, k).unwrap(), c.values.as_slice());
        }
    }

    #[test]
    fn split_bounds() {
        let v = view(|_, s| s);
        let p = to_pivot(&v, 0).unwrap();
        assert_eq!(p.row_headers.len(), 1);
        assert_eq!(p.column_headers.len(), v.len());
        let p = to_pivot(&v, 2).unwrap();
        assert_eq!(p.column_headers, [Vec::<String>::new()]);
        assert_eq!(to_pivot(&v, 3).unwrap_err(), PivotError { split: 3, axes: 2 });
    }

    #[test]
    fn switch_reorders_rows_only() {
        let plain = to_pivot(&view(|_, s| s), 1).unwrap();
        let switched = to_pivot(&view(|_, s| s.switch("d_date", &["Feb".into(), "Jan".into()]).unwrap()), 1).unwrap();
        assert_eq!(switched.row_headers, [["Feb"], ["Jan"]]);
        assert_eq!(switched.body[0], plain.body[1]);
        assert_eq!(switched.body[1], plain.body[0]);
    }

    #[test]
    fn cube_all_sorts_last() {
        let v = view(|_, s| s.cube(&["d_date".into(), "d_product".into()]).unwrap());
        let p = to_pivot(&v, 1).unwrap();
        assert_eq!(p.row_headers, [["Jan"], ["Feb"], ["*"]]);
        assert_eq!(p.column_headers, [["catA"], ["catB"], ["*"]]);
        let csv = p.to_csv();
        assert!(csv.starts_with("d_product,catA,catB,*\nd_date,amount,amount,amount\n"), "{csv:?}");
    }
}
