use std::collections::BTreeMap;

use serde::Serialize;

use super::QueryState;
use crate::model::AggregateFn;

/// Coordinate of an axis collapsed by the cube operator.
pub const ALL: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViewAxis {
    /// Dimension id or `μ:<measure>`.
    pub id: String,
    /// Level id, or `value` for a pulled axis.
    pub level: String,
    /// Layout order: the state's member order, then any sentinel coordinates
    /// that occur in the cells.
    pub members: Vec<String>,
    pub cube: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViewMeasure {
    pub name: String,
    pub function: AggregateFn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell<T> {
    /// One member id (or `*`, or a sentinel) per axis.
    pub coords: Vec<String>,
    /// One value per measure of the view.
    pub values: Vec<T>,
}

/// A materialized query result. Only non-empty cells are stored, ordered by
/// axis member order with `*` last.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeView<T> {
    pub axes: Vec<ViewAxis>,
    pub measures: Vec<ViewMeasure>,
    pub cells: Vec<Cell<T>>,
    pub query: QueryState,
}

impl<T: Clone> CubeView<T> {
    pub fn cell_map(&self) -> BTreeMap<Vec<String>, Vec<T>> {
        self.cells.iter().map(|c| (c.coords.clone(), c.values.clone())).collect()
    }

    pub fn get(&self, coords: &[&str]) -> Option<&[T]> {
        self.cells
            .iter()
            .find(|c| c.coords.iter().map(String::as_str).eq(coords.iter().copied()))
            .map(|c| c.values.as_slice())
    }

    /// Value of measure `name` at `coords`.
    pub fn value(&self, coords: &[&str], name: &str) -> Option<T> {
        let i = self.measure_index(name)?;
        self.get(coords).map(|v| v[i].clone())
    }

    pub fn measure_index(&self, name: &str) -> Option<usize> {
        self.measures.iter().position(|m| m.name == name)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}
