use crate::error::{Error, Result};

/// A real value attached to each area code, in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaVector {
    pub area_ids: Vec<String>,
    pub values: Vec<f64>,
}

impl AreaVector {
    pub fn new(area_ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if area_ids.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: area_ids.len(),
                right: values.len(),
            });
        }
        Ok(Self { area_ids, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.area_ids
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.area_ids
            .iter()
            .position(|a| a == id)
            .map(|i| self.values[i])
    }

    /// Same ids, every value multiplied by -1.
    pub fn negated(&self) -> Self {
        Self {
            area_ids: self.area_ids.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}
