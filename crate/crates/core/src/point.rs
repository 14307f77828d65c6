use std::collections::BTreeMap;

use crate::array::Array;
use crate::error::{Error, Result};

/// A named assignment of arrays: start values, optimizer output and trace rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    entries: BTreeMap<String, Array>,
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: impl Into<Array>) -> Option<Array> {
        self.entries.insert(name.into(), value.into())
    }

    pub fn with(mut self, name: impl Into<String>, value: impl Into<Array>) -> Self {
        self.insert(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Array> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Array> {
        self.entries.get_mut(name)
    }

    pub fn require(&self, name: &str) -> Result<&Array> {
        self.get(name)
            .ok_or_else(|| Error::MissingInput(name.to_string()))
    }

    /// Value of a size-one entry.
    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(Array::item)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<Array> {
        self.entries.remove(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Array)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copy every entry of `other` into `self`, overwriting.
    pub fn update(&mut self, other: &Point) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }
}

impl FromIterator<(String, Array)> for Point {
    fn from_iter<I: IntoIterator<Item = (String, Array)>>(iter: I) -> Self {
        Point {
            entries: iter.into_iter().collect(),
        }
    }
}
